package app.service;

import app.crypto.CryptoConfig;
import javax.crypto.Cipher;
import javax.crypto.SecretKey;
import javax.crypto.spec.IvParameterSpec;

public class Vault {
    public byte[] seal(SecretKey key, byte[] iv, byte[] plain) throws Exception {
        Cipher cipher = Cipher.getInstance(CryptoConfig.transformation());
        cipher.init(Cipher.ENCRYPT_MODE, key, new IvParameterSpec(iv));
        return cipher.doFinal(plain);
    }

    public byte[] open(SecretKey key, byte[] iv, byte[] sealed) throws Exception {
        Cipher cipher = Cipher.getInstance(CryptoConfig.transformation());
        cipher.init(Cipher.DECRYPT_MODE, key, new IvParameterSpec(iv));
        return cipher.doFinal(sealed);
    }
}
