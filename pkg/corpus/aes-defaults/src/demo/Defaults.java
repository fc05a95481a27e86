package demo;

import javax.crypto.Cipher;
import javax.crypto.SecretKey;

public class Defaults {
    public byte[] encrypt(SecretKey key, byte[] plain) throws Exception {
        Cipher c = Cipher.getInstance("AES");
        c.init(Cipher.ENCRYPT_MODE, key);
        return c.doFinal(plain);
    }
}
