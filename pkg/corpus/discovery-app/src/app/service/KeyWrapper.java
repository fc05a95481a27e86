package app.service;

import java.security.Key;
import javax.crypto.Cipher;
import javax.crypto.SecretKey;

public class KeyWrapper {
    public byte[] wrap(SecretKey kek, SecretKey dataKey) throws Exception {
        Cipher cipher = Cipher.getInstance("AESWrap");
        cipher.init(Cipher.WRAP_MODE, kek);
        return cipher.wrap(dataKey);
    }

    public Key unwrap(SecretKey kek, byte[] wrapped) throws Exception {
        Cipher cipher = Cipher.getInstance("AESWrap");
        cipher.init(Cipher.UNWRAP_MODE, kek);
        return cipher.unwrap(wrapped, "AES", Cipher.SECRET_KEY);
    }
}
