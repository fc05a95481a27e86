package demo;

import javax.crypto.Cipher;
import javax.crypto.SecretKey;

public class CryptoWrapper {
    public byte[] encrypt(String transformation, SecretKey key, byte[] data) throws Exception {
        Cipher cipher = Cipher.getInstance(transformation);
        cipher.init(Cipher.ENCRYPT_MODE, key);
        return cipher.doFinal(data);
    }
}
